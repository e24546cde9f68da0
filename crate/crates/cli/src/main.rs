use clap::Parser;
use intcoh_cli::{render_plain, run, Cli, Format};

fn main() {
    let cli = Cli::parse();
    let (code, report) = run(&cli);
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("reports are plain JSON"),
        Format::Plain => render_plain(&report),
    };
    if code == 0 {
        println!("{text}");
    } else {
        eprintln!("{text}");
    }
    std::process::exit(code);
}
