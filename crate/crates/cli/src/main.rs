fn main() {
    // Die quietly when a pager or `head` closes our pipe early, like other
    // line-oriented tools, instead of panicking mid-print.
    #[cfg(unix)]
    // SAFETY: restoring the default disposition of SIGPIPE before any other
    // thread exists is the documented use of `signal`.
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(mdload_cli::cli_main(std::env::args_os()));
}
