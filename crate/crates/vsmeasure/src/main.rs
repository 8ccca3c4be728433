fn main() {
    vsmeasure::cli::main()
}
