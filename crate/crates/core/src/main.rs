fn main() {
    std::process::exit(morava_chern::cli::run(std::env::args_os()));
}
