use clap::Parser;

use ratlab::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, _)) => println!("{}", report.summary),
        Err(e) => {
            eprintln!("ratlab: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
