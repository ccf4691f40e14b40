from mechgap.cli import main

main()
