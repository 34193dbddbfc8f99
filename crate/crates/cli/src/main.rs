use clap::Parser;
use germlie_cli::{run, Cli, Command};

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(config) => {
            let outcome = run(&config);
            if outcome.exit_code == germlie_cli::EXIT_PASS {
                println!("{}", outcome.message);
            } else {
                eprintln!("{}", outcome.message);
            }
            outcome.exit_code
        }
    };
    std::process::exit(code);
}
