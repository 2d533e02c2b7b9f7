use clap::Parser;
use matmart_cli::commands::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(cli.command, &cli.common) {
        Ok(summary) => println!("{summary}"),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
