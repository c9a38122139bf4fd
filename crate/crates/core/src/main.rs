fn main() {
    std::process::exit(worklab::lab::cli::cli_main(std::env::args_os()));
}
