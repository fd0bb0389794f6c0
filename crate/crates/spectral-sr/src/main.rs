fn main() {
    std::process::exit(spectral_sr::cli::run());
}
