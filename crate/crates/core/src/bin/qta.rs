fn main() {
    std::process::exit(qta::lab::cli::main(std::env::args_os()));
}
