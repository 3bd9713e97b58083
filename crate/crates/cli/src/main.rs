use clap::Parser;
use leafkit::{configure_threads, execute, Cli, SpectrumCache};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = configure_threads(cli.threads).and_then(|_| execute(&cli, &SpectrumCache::from_env()));
    match result {
        Ok(report) => {
            print!("{}", report.render());
            println!(
                "wrote {} files to {}",
                report.manifest.files.len() + 1,
                report.manifest.config.output.dir.display()
            );
        }
        Err(e) => {
            eprintln!("leafkit: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
