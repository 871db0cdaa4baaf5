fn main() {
    std::process::exit(neumann_fft::cli::run(std::env::args_os()));
}
