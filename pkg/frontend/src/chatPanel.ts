/** The conversational side of the split panel.
 *
 * Free-form text plus image upload (file picker or camera capture).
 * Replies render URLs as clickable links and image URLs inline. The panel
 * opens with example questions and a disclaimer about the AI's limits.
 */

import { ApiClient, ApiError } from "./api.js";

const EXAMPLE_QUESTIONS = [
  "Show me kangaroo specimens from NSW in the 1980s",
  "How many Christmas Beetles do you have from NSW?",
  "Which sugar gliders were found between 2000 and 2010?",
  "Show me frogs near Castle Hill",
];

const DISCLAIMER =
  "The AI assistant can make mistakes. Counts and record details come " +
  "from the museum's collection data; use the links in each answer to " +
  "verify them at the source.";

const URL_PATTERN = /https?:\/\/[^\s<>"']+/g;
const IMAGE_URL_PATTERN = /\.(jpe?g|png|webp)(\?|$)/i;

export class ChatPanel {
  readonly element: HTMLElement;
  sessionId: string | null = null;
  pendingImages: string[] = [];
  private readonly log: HTMLElement;
  private readonly input: HTMLTextAreaElement;
  private readonly attachmentsBar: HTMLElement;
  private sending = false;

  constructor(private readonly api: ApiClient) {
    this.element = el("section", "chat-panel");

    this.log = el("div", "chat-log");
    this.log.setAttribute("data-testid", "chat-log");
    this.element.appendChild(this.log);
    this.renderIntro();

    this.attachmentsBar = el("div", "attachments");
    this.element.appendChild(this.attachmentsBar);

    const form = el("form", "chat-form") as HTMLFormElement;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.send();
    });

    this.input = document.createElement("textarea");
    this.input.className = "chat-input";
    this.input.rows = 2;
    this.input.placeholder = "Ask about the collection…";
    this.input.setAttribute("data-testid", "chat-input");
    form.appendChild(this.input);

    const buttons = el("div", "chat-buttons");
    buttons.appendChild(this.fileButton("Upload image", "image/*", null));
    buttons.appendChild(this.fileButton("Camera", "image/*", "environment"));
    const send = document.createElement("button");
    send.type = "submit";
    send.textContent = "Send";
    send.setAttribute("data-testid", "chat-send");
    buttons.appendChild(send);
    form.appendChild(buttons);
    this.element.appendChild(form);
  }

  private fileButton(label: string, accept: string,
                     capture: string | null): HTMLElement {
    const wrapper = el("label", "file-button");
    wrapper.appendChild(document.createTextNode(label));
    const input = document.createElement("input");
    input.type = "file";
    input.accept = accept;
    if (capture) input.setAttribute("capture", capture);
    input.addEventListener("change", () => {
      if (input.files) void this.attachFiles(Array.from(input.files));
      input.value = "";
    });
    wrapper.appendChild(input);
    return wrapper;
  }

  /** Read files into base64 data URLs queued for the next message. */
  async attachFiles(files: File[]): Promise<void> {
    for (const file of files) {
      const dataUrl = await readAsDataUrl(file);
      this.pendingImages.push(dataUrl);
    }
    this.renderAttachments();
  }

  private renderAttachments(): void {
    this.attachmentsBar.replaceChildren();
    this.pendingImages.forEach((dataUrl, index) => {
      const chip = el("span", "attachment-chip");
      const thumb = document.createElement("img");
      thumb.src = dataUrl;
      thumb.alt = `attachment ${index + 1}`;
      chip.appendChild(thumb);
      const remove = document.createElement("button");
      remove.type = "button";
      remove.textContent = "×";
      remove.addEventListener("click", () => {
        this.pendingImages.splice(index, 1);
        this.renderAttachments();
      });
      chip.appendChild(remove);
      this.attachmentsBar.appendChild(chip);
    });
  }

  async send(textOverride?: string): Promise<void> {
    const text = (textOverride ?? this.input.value).trim();
    if ((!text && this.pendingImages.length === 0) || this.sending) return;
    this.sending = true;
    const images = this.pendingImages;
    this.pendingImages = [];
    this.renderAttachments();
    this.input.value = "";
    this.appendMessage("user", text || "(image)", images);
    try {
      const response = await this.api.sendChat(text, this.sessionId, images);
      this.sessionId = response.session_id;
      this.appendMessage("assistant", response.reply, []);
    } catch (error) {
      const detail = error instanceof ApiError
        ? error.message
        : "the service could not be reached";
      this.appendMessage("assistant", `Something went wrong: ${detail}`, []);
    } finally {
      this.sending = false;
    }
  }

  private renderIntro(): void {
    const intro = el("div", "chat-message intro");
    intro.setAttribute("data-testid", "intro-message");
    const welcome = el("p", "intro-welcome");
    welcome.textContent =
      "Hello! I can help you explore the museum's digitised specimen " +
      "collection. Try questions like:";
    intro.appendChild(welcome);
    const list = document.createElement("ul");
    for (const question of EXAMPLE_QUESTIONS) {
      const item = document.createElement("li");
      const link = document.createElement("a");
      link.href = "#";
      link.textContent = question;
      link.addEventListener("click", (event) => {
        event.preventDefault();
        void this.send(question);
      });
      item.appendChild(link);
      list.appendChild(item);
    }
    intro.appendChild(list);
    const disclaimer = el("p", "disclaimer");
    disclaimer.setAttribute("data-testid", "disclaimer");
    disclaimer.textContent = DISCLAIMER;
    intro.appendChild(disclaimer);
    this.log.appendChild(intro);
  }

  private appendMessage(role: "user" | "assistant", text: string,
                        images: string[]): void {
    const message = el("div", `chat-message ${role}`);
    message.setAttribute("data-role", role);
    message.appendChild(renderRichText(text));
    for (const image of images) {
      const thumb = document.createElement("img");
      thumb.src = image;
      thumb.className = "sent-image";
      message.appendChild(thumb);
    }
    this.log.appendChild(message);
    this.log.scrollTop = this.log.scrollHeight;
  }
}

/** Plain text with URLs upgraded: anchors for links, inline <img> for
 * image URLs. User/model text is never injected as HTML. */
export function renderRichText(text: string): HTMLElement {
  const container = document.createElement("div");
  container.className = "rich-text";
  let cursor = 0;
  for (const match of text.matchAll(URL_PATTERN)) {
    const start = match.index ?? 0;
    if (start > cursor) {
      container.appendChild(document.createTextNode(text.slice(cursor, start)));
    }
    const url = match[0];
    if (IMAGE_URL_PATTERN.test(url)) {
      const img = document.createElement("img");
      img.src = url;
      img.className = "inline-image";
      img.loading = "lazy";
      container.appendChild(img);
    } else {
      const anchor = document.createElement("a");
      anchor.href = url;
      anchor.textContent = url;
      anchor.target = "_blank";
      anchor.rel = "noopener noreferrer";
      container.appendChild(anchor);
    }
    cursor = start + url.length;
  }
  if (cursor < text.length) {
    container.appendChild(document.createTextNode(text.slice(cursor)));
  }
  return container;
}

function readAsDataUrl(file: File): Promise<string> {
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => resolve(String(reader.result));
    reader.onerror = () => reject(reader.error);
    reader.readAsDataURL(file);
  });
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}
