fn main() -> std::process::ExitCode {
    ctcsim::cli::main()
}
