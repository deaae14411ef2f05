use clap::Parser;
use dfsphere_cli::cli::{configure_threads, execute, Cli};

fn main() {
    let cli = Cli::parse();
    let result = configure_threads()
        .and_then(|()| execute(cli, &mut std::io::stdout(), &mut std::io::stderr()));
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
