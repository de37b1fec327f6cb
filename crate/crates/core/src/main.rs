fn main() {
    std::process::exit(hipfrac::cli::dispatch(std::env::args_os()));
}
