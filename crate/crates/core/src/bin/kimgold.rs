use clap::Parser;

use kimgold::cli::{run, Cli, Exit};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap's own code for bad arguments would collide with the
            // verification-failure code
            std::process::exit(if e.use_stderr() {
                Exit::Usage.code()
            } else {
                Exit::Ok.code()
            });
        }
    };
    std::process::exit(run(cli));
}
