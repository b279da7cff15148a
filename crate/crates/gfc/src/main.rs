fn main() {
    std::process::exit(gfc::cli::run(std::env::args_os()));
}
