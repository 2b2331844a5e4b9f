#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(cfg) = channelspin::cli::parse_config_str(s) {
        // anything accepted must survive a round trip
        let again = channelspin::cli::parse_config_str(&cfg.to_toml()).expect("reparse");
        assert_eq!(again, cfg);
    }
});
