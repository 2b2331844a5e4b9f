#![no_main]

use libfuzzer_sys::fuzz_target;
use channelspin::cli::csv;

fuzz_target!(|s: &str| {
    if let Ok(table) = csv::parse(s) {
        let _ = channelspin::cli::svg::render(&table, "fuzz");
    }
});
