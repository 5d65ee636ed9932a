fn main() -> std::process::ExitCode {
    cusp_transfer::cli::main()
}
