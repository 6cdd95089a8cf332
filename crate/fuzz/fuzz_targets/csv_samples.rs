#![no_main]

use libfuzzer_sys::fuzz_target;
use mellinfrac::io::{
    read_field, read_sampled_function, read_samples, read_spectrum, write_samples,
};

fuzz_target!(|data: &[u8]| {
    let _ = read_sampled_function(data);
    let _ = read_spectrum(data, 0.5);
    let _ = read_field(data);

    // Whatever reads back must survive a write and a second read unchanged.
    if let Ok((xs, vs)) = read_samples(data) {
        let mut buf = Vec::new();
        write_samples(&mut buf, &xs, &vs).expect("writes");
        let (xs2, vs2) = read_samples(buf.as_slice()).expect("written samples parse");
        assert_eq!(xs, xs2);
        assert_eq!(vs, vs2);
    }
});
