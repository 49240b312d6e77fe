fn main() -> std::process::ExitCode {
    statedesign::cli::main()
}
