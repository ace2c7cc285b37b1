fn main() {
    std::process::exit(gridplan::cli::main());
}
