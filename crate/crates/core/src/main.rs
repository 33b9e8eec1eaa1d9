fn main() {
    std::process::exit(cpe_workbench::cli::main_with_args(std::env::args_os()));
}
