fn main() {
    std::process::exit(wasserstein_align::harness::cli_main(std::env::args_os()));
}
