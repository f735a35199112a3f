fn main() {
    std::process::exit(binclust_cli::cli_main(std::env::args_os()));
}
