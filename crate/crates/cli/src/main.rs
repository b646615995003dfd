fn main() {
    std::process::exit(semidyn_cli::run_command(std::env::args_os()));
}
