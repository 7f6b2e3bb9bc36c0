from app.main import main

# Re-export the CLI entry point for `python main.py`
__all__ = ["main"]

if __name__ == "__main__":
    raise SystemExit(main())
