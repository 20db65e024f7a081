fn main() {
    std::process::exit(commsched::cli::run(std::env::args_os()));
}
