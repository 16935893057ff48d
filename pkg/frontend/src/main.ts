/**
 * DOM wiring: renders the transcript and forwards every user action,
 * typed or clicked, through one ChatClient.send call. Input stays
 * disabled while a request is in flight so each session has at most one.
 */

import { ApiError, ChatClient, newSessionId } from './api.js';
import type { ChatResponse } from './api.js';
import {
  appendExchange,
  currentStep,
  ordinalText,
  placeholderText,
  quickActions,
  stepLabel,
  type UiMessage,
} from './chat.js';

interface AppState {
  messages: UiMessage[];
  busy: boolean;
  lastResponse: ChatResponse | null;
  pendingRetry: string | null;
}

export function startApp(root: HTMLElement, client: ChatClient): void {
  const state: AppState = { messages: [], busy: false, lastResponse: null, pendingRetry: null };

  root.innerHTML = `
    <div class="chat">
      <div class="chat-status" data-role="status"></div>
      <div class="chat-log" data-role="log"></div>
      <div class="chat-actions" data-role="actions"></div>
      <form class="chat-form" data-role="form">
        <input type="text" data-role="input" placeholder="Type a message" autocomplete="off">
        <button type="submit" data-role="send">Send</button>
      </form>
    </div>`;

  const log = root.querySelector('[data-role="log"]') as HTMLElement;
  const status = root.querySelector('[data-role="status"]') as HTMLElement;
  const actionsBar = root.querySelector('[data-role="actions"]') as HTMLElement;
  const form = root.querySelector('[data-role="form"]') as HTMLFormElement;
  const input = root.querySelector('[data-role="input"]') as HTMLInputElement;
  const sendButton = root.querySelector('[data-role="send"]') as HTMLButtonElement;

  function render(): void {
    log.textContent = '';
    const placeholder = placeholderText(state.messages);
    if (placeholder) {
      const greeting = document.createElement('div');
      greeting.className = 'placeholder';
      greeting.textContent = placeholder;
      log.appendChild(greeting);
    }
    for (const message of state.messages) {
      const bubble = document.createElement('div');
      bubble.className = message.author === 'User' ? 'bubble user' : 'bubble bot';
      bubble.textContent = message.text;
      log.appendChild(bubble);
      if (message.options) {
        const row = document.createElement('div');
        row.className = 'options';
        for (const option of message.options) {
          const button = document.createElement('button');
          button.type = 'button';
          button.textContent = `${option.index}. ${option.title}`;
          button.addEventListener('click', () => submit(ordinalText(option.index)));
          row.appendChild(button);
        }
        log.appendChild(row);
      }
    }

    const step = currentStep(state.messages);
    status.textContent = step ? stepLabel(step) : '';

    actionsBar.textContent = '';
    if (state.pendingRetry !== null) {
      const retry = document.createElement('button');
      retry.type = 'button';
      retry.textContent = 'Retry';
      const line = state.pendingRetry;
      retry.addEventListener('click', () => submit(line));
      actionsBar.appendChild(retry);
    } else if (state.lastResponse) {
      for (const action of quickActions(state.lastResponse)) {
        const button = document.createElement('button');
        button.type = 'button';
        button.textContent = action.label;
        button.addEventListener('click', () => submit(action.utterance));
        actionsBar.appendChild(button);
      }
    }

    const ended = state.lastResponse?.ended ?? false;
    input.disabled = state.busy || ended;
    sendButton.disabled = state.busy || ended;
    log.scrollTop = log.scrollHeight;
  }

  async function submit(text: string): Promise<void> {
    const line = text.trim();
    if (!line || state.busy) {
      return;
    }
    state.busy = true;
    state.pendingRetry = null;
    render();
    try {
      const response = await client.send(line);
      state.messages = appendExchange(state.messages, line, response);
      state.lastResponse = response;
    } catch (err) {
      // the transcript stays intact; the user can retry the same line
      state.pendingRetry = line;
      status.textContent = err instanceof ApiError ? err.message : String(err);
    } finally {
      state.busy = false;
      render();
    }
  }

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const line = input.value;
    input.value = '';
    void submit(line);
  });

  render();
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  const client = new ChatClient('', newSessionId());
  startApp(document.getElementById('app') as HTMLElement, client);
}
