fn main() -> std::process::ExitCode {
    dos_lab::cli::run(std::env::args_os())
}
