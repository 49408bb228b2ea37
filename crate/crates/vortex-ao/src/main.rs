fn main() {
    std::process::exit(vortex_ao::cli::run(std::env::args_os()));
}
