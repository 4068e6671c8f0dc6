namespace blowup {
}
