from fracdg.xcli import main

raise SystemExit(main())
