fn main() -> std::process::ExitCode {
    panotrack::cli::main()
}
