fn main() {
    minegrid_core::cli::init_logging();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = minegrid_core::cli::run_command(
        std::env::args_os(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    );
    std::process::exit(code);
}
