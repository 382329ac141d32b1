fn main() {
    std::process::exit(pitman_yor::cli::cli_main(std::env::args_os()));
}
