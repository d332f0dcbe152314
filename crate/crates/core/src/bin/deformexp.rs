fn main() {
    std::process::exit(deformexp::cli::main());
}
