fn main() {
    std::process::exit(iig::cli::main(std::env::args_os()));
}
