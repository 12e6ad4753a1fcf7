fn main() {
    std::process::exit(lyapstep::cli::run(std::env::args_os()));
}
