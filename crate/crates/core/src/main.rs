fn main() {
    std::process::exit(bottleneck_lab::cli::run_main());
}
