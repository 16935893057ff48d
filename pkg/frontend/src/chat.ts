/**
 * Pure view-model for the chat transcript.
 *
 * No DOM and no network in here: functions take the current message list
 * plus a server response and return the next list, so every transition is
 * unit-testable with plain objects. Option indices are 1-based and kept
 * exactly in the order the server sent them.
 */

import type { ChatResponse } from './api.js';

export type Author = 'User' | 'Bot';

export interface UiOption {
  index: number;
  title: string;
}

export interface UiStep {
  index: number;
  total: number;
}

export interface UiMessage {
  author: Author;
  text: string;
  options?: UiOption[];
  step?: UiStep;
}

export interface QuickAction {
  label: string;
  utterance: string;
}

const ORDINALS = [
  'first', 'second', 'third', 'fourth', 'fifth',
  'sixth', 'seventh', 'eighth', 'ninth', 'tenth',
];

/**
 * Text sent when the user clicks option buttons. Clicking is just a
 * shortcut for typing, so the server sees the same selection path either
 * way: "the second one" for index 2.
 */
export function ordinalText(index: number): string {
  if (!Number.isInteger(index) || index < 1) {
    throw new RangeError(`option index must be a positive integer, got ${index}`);
  }
  if (index <= ORDINALS.length) {
    return `the ${ORDINALS[index - 1]} one`;
  }
  return `option ${index}`;
}

export function userMessage(text: string): UiMessage {
  return { author: 'User', text };
}

export function botMessage(response: ChatResponse): UiMessage {
  const message: UiMessage = { author: 'Bot', text: response.reply };
  if (response.options.length > 0) {
    message.options = response.options.map((option, i) => ({
      index: i + 1,
      title: option.title,
    }));
  }
  if (response.step_index !== null && response.step_total !== null) {
    message.step = { index: response.step_index, total: response.step_total };
  }
  return message;
}

/** Append the user's line and the bot's reply as one exchange. */
export function appendExchange(
  messages: readonly UiMessage[],
  typed: string,
  response: ChatResponse,
): UiMessage[] {
  return [...messages, userMessage(typed), botMessage(response)];
}

export function stepLabel(step: UiStep): string {
  return `Step ${step.index} of ${step.total}`;
}

/** Latest step indicator, shown persistently while a task is underway. */
export function currentStep(messages: readonly UiMessage[]): UiStep | null {
  for (let i = messages.length - 1; i >= 0; i--) {
    const step = messages[i].step;
    if (step) {
      return step;
    }
  }
  return null;
}

/** Quick actions offered while the user is walking through steps. */
export function quickActions(response: ChatResponse): QuickAction[] {
  if (response.phase !== 'Completion' || response.ended) {
    return [];
  }
  const actions: QuickAction[] = [
    { label: 'Next step', utterance: 'next' },
    { label: 'Repeat', utterance: 'repeat' },
  ];
  if (response.step_total !== null) {
    actions.push({ label: 'Show ingredients', utterance: 'show ingredients' });
  }
  return actions;
}

export function placeholderText(messages: readonly UiMessage[]): string | null {
  return messages.length === 0 ? 'Say hello to get started.' : null;
}
