fn main() {
    std::process::exit(spintomo::cli::run(std::env::args_os()));
}
