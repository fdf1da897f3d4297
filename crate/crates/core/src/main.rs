fn main() {
    porolab::cli::main()
}
