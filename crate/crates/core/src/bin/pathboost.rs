fn main() {
    std::process::exit(pathboost::cli::main());
}
