fn main() {
    std::process::exit(depthcue_cli::main_with(std::env::args_os()));
}
