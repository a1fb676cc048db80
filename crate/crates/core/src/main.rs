fn main() -> std::process::ExitCode {
    markov_moment::cli::main()
}
