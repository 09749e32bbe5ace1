fn main() {
    std::process::exit(rcam_kdv::cli::main_with_args(std::env::args_os()));
}
