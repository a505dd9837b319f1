fn main() {
    let code = amplikit_cli::main_with(std::env::args_os());
    std::process::exit(code);
}
