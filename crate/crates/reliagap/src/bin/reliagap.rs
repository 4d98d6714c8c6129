fn main() {
    std::process::exit(reliagap::cli::cli_main());
}
