fn main() {
    std::process::exit(eigenform_lab::cli::run(std::env::args()));
}
