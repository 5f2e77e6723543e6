fn main() {
    std::process::exit(adm_cli::main_with_args(std::env::args_os()));
}
