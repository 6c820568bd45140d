//! Thin binary wrapper: all behaviour lives in [`liecat::cli::run`] so the
//! command surface is testable in-process.

fn main() {
    let args: Vec<std::ffi::OsString> = std::env::args_os().skip(1).collect();
    let outcome = liecat::cli::run(args);
    print!("{}", outcome.report);
    std::process::exit(outcome.status);
}
