from tsnsim.cli import main

raise SystemExit(main())
