from liyorke.cli import main

main()
