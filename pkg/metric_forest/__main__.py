from metric_forest.cli import main

if __name__ == "__main__":
    main()
