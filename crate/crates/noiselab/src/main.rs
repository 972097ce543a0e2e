use clap::Parser;
use noiselab::cli::{self, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match cli::run(cli, &mut std::io::stdout().lock()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
