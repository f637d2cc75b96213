fn main() {
    std::process::exit(locinfo::cli::main());
}
