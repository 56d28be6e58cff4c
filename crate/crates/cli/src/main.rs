use clap::Parser;

fn main() {
    let cli = assoc_bench::Cli::parse();
    if let Err(err) = assoc_bench::run(cli) {
        eprintln!("assoc-bench: {err}");
        std::process::exit(err.exit_code());
    }
}
