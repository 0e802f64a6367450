fn main() {
    std::process::exit(ncvis::cli::run(std::env::args_os()));
}
