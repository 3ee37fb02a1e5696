from logprivacy.cli import main

main()
