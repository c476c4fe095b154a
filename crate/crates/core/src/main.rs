fn main() -> std::process::ExitCode {
    lorentz_beables::cli::main()
}
