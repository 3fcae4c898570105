fn main() {
    let code = critsense::cli::run(std::env::args_os());
    std::process::exit(code);
}
