use clap::Parser;
use interlace::cli::{run, Cli, EXIT_INPUT, EXIT_OK};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    let outcome = run(&cli, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(outcome.exit_code);
}
