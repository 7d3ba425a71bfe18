fn main() {
    std::process::exit(primbase::cli::run(std::env::args_os()));
}
