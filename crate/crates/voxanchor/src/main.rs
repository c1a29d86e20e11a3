fn main() {
    std::process::exit(voxanchor::cli::main_with_args(std::env::args_os()));
}
