fn main() {
    let (code, _) = bethe_cli::run_command(std::env::args_os());
    std::process::exit(code);
}
