//! Drives the batch front end from code, as the `rwre` binary does.
//!
//! `cargo run --example command_line -- oracle --fixture drifted-2d --out /tmp/rwre_`

fn main() {
    let mut args: Vec<String> = std::env::args().collect();
    if args.len() == 1 {
        args.extend(["oracle", "--fixture", "drifted-2d", "--out", "rwre_example_"].map(String::from));
    }
    std::process::exit(rwre::cli::main_with_args(args));
}
