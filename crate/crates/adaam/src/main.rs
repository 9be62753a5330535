fn main() {
    std::process::exit(adaam::cli::run(std::env::args_os()));
}
