fn main() {
    std::process::exit(thermal_sda::cli::run(std::env::args_os()));
}
