fn main() -> std::process::ExitCode {
    lvhsgp::cli::main_with_args(std::env::args_os())
}
