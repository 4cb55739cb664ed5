"""Local mock endpoint speaking the chat-completions protocol."""
