use clap::Parser;
use intertwine_cli::config::RunConfig;
use intertwine_cli::{exit_code, render, selftest, write_output, Cli, Command};

fn run(cli: Cli) -> anyhow::Result<i32> {
    let (name, args) = match cli.command {
        Command::Selftest(a) => return selftest::main(&a.only, a.json),
        Command::Wfactor(a) => ("wfactor", a),
        Command::Dtwist(a) => ("dtwist", a),
        Command::SupportScan(a) => ("support-scan", a),
        Command::Psik(a) => ("psik", a),
        Command::Coeffs(a) => ("coeffs", a),
        Command::RgTerm(a) => ("rg-term", a),
        Command::Residue(a) => ("residue", a),
    };
    let cfg = RunConfig::from_path(&args.config)?;
    let text = render(name, &cfg)?;
    write_output(&cfg, &text)?;
    Ok(0)
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(exit_code(&e));
        }
    }
}
