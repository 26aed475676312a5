fn main() {
    std::process::exit(delaydiff::cli::run(std::env::args_os()));
}
