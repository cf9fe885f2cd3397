use std::io::Write;

use pcoh_cli::{run_command, FileSystem};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ex = run_command(&args, &mut FileSystem);
    // help and version text belong on stdout
    let text_to_stdout = ex.document.is_none() && ex.exit_code == 0;
    let mut sink: Box<dyn Write> = if text_to_stdout {
        Box::new(std::io::stdout().lock())
    } else {
        Box::new(std::io::stderr().lock())
    };
    for line in &ex.log {
        let _ = writeln!(sink, "{}", line.trim_end());
    }
    drop(sink);
    if let Some(doc) = &ex.document {
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(&doc.to_bytes());
        let _ = out.flush();
    }
    std::process::exit(ex.exit_code);
}
