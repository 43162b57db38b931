from note2ucdi.cli.app import main

main()
