fn main() {
    std::process::exit(gbq::cli::run(std::env::args_os()));
}
